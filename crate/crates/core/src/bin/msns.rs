fn main() {
    std::process::exit(msns::cli::dispatch(std::env::args_os()));
}
