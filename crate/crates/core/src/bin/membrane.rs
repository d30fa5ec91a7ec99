fn main() {
    std::process::exit(membrane_bifurcation::cli::main_with_args(
        std::env::args().skip(1),
    ));
}
