fn main() {
    std::process::exit(airmatch::cli::main_with(std::env::args_os()));
}
