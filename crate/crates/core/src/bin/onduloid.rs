fn main() {
    std::process::exit(onduloid::cli::run(std::env::args_os()));
}
