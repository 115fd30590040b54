fn main() {
    std::process::exit(balsys::cli::run(std::env::args_os()));
}
