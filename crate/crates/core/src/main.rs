fn main() {
    std::process::exit(schemakern::cli::run());
}
