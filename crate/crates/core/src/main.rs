fn main() {
    std::process::exit(irisuu::cli::run(std::env::args_os()));
}
