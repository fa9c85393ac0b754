fn main() {
    std::process::exit(lorentz_lab::cli::run());
}
