fn main() {
    std::process::exit(polyshell::cli::run(std::env::args()));
}
