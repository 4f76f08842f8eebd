fn main() {
    std::process::exit(normroute::cli::run(std::env::args_os()));
}
