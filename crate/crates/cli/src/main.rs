fn main() {
    std::process::exit(fhl_cli::run(std::env::args_os()));
}
