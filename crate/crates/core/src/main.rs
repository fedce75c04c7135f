fn main() {
    std::process::exit(evykit::cli::main_with_args(std::env::args_os()));
}
