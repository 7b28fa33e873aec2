fn main() {
    std::process::exit(perigen::cli::main());
}
