fn main() {
    std::process::exit(fracmax::cli::parse_and_dispatch(std::env::args_os()));
}
