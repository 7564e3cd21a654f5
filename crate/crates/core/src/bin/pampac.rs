fn main() {
    std::process::exit(pampac::cli::cli_main(std::env::args_os()));
}
