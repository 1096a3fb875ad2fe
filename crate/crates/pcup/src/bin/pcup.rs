fn main() {
    std::process::exit(pcup::cli::main_with(std::env::args_os()));
}
