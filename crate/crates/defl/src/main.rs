fn main() {
    std::process::exit(defl::cli::run(std::env::args()));
}
