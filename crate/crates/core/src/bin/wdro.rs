fn main() {
    std::process::exit(wdro::cli::dispatch(std::env::args_os()));
}
