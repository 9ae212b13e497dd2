fn main() {
    std::process::exit(ruled_minimal::cli::run());
}
