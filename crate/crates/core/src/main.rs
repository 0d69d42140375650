fn main() {
    std::process::exit(amplify::bench::cli::main());
}
