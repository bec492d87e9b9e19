fn main() {
    std::process::exit(stm::cli::cli_main(std::env::args_os()));
}
