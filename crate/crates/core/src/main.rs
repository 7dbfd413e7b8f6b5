fn main() {
    std::process::exit(nmisc::cli::main_with_args(std::env::args_os()));
}
