fn main() {
    std::process::exit(spdc_lg::cli::main(std::env::args_os()));
}
