fn main() {
    std::process::exit(fockimpl::cli::cli_main(std::env::args_os()));
}
