fn main() {
    std::process::exit(cyclone::cli::run(std::env::args_os()));
}
