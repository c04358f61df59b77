fn main() {
    std::process::exit(teto_tools::cli::run());
}
