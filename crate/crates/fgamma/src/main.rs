fn main() {
    std::process::exit(fgamma::cli::run());
}
