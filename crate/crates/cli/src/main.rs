fn main() {
    std::process::exit(tempotopic_cli::run(std::env::args_os()));
}
