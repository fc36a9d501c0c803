fn main() {
    std::process::exit(ctmsm::cli::run(std::env::args_os()));
}
