fn main() {
    std::process::exit(nsch::cli::main());
}
