fn main() {
    std::process::exit(mgamma::cli::main());
}
