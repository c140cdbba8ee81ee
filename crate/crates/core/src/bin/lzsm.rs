fn main() {
    std::process::exit(lzsm::cli::main_with(std::env::args_os()));
}
