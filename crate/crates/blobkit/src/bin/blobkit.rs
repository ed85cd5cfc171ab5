fn main() {
    std::process::exit(blobkit::cli::main_with_args(std::env::args_os()));
}
