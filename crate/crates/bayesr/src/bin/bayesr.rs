fn main() {
    std::process::exit(bayesr::cli::run(std::env::args_os()));
}
