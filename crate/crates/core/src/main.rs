fn main() {
    std::process::exit(transeig::cli::run(std::env::args_os()));
}
