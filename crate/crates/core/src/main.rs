fn main() {
    std::process::exit(soc_sentinel::cli::run(std::env::args_os()));
}
