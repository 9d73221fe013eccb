fn main() {
    std::process::exit(momentum_entanglement::cli::run(std::env::args_os()));
}
