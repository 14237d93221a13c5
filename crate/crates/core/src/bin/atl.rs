fn main() {
    std::process::exit(atl::cli::run(std::env::args_os()));
}
