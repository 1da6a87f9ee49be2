fn main() {
    std::process::exit(cekit::dispatch(std::env::args_os()));
}
