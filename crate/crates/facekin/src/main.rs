fn main() {
    std::process::exit(facekin::cli::run());
}
