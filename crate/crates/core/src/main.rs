fn main() {
    std::process::exit(tristeer::cli::run(std::env::args_os()));
}
