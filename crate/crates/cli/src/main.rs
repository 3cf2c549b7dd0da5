fn main() {
    std::process::exit(squareval_cli::run(std::env::args_os()));
}
