fn main() {
    std::process::exit(idws::cli::main_with_args(std::env::args_os()));
}
