fn main() {
    std::process::exit(levichain_cli::run(std::env::args_os()));
}
