fn main() {
    std::process::exit(deltaprime::cli::run(std::env::args_os()));
}
