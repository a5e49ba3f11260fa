fn main() {
    std::process::exit(qccd::cli::main());
}
