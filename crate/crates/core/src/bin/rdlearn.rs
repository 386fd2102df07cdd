fn main() {
    std::process::exit(rdlearn::cli::run(std::env::args_os()));
}
