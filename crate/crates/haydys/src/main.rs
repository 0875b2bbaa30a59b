fn main() {
    std::process::exit(haydys::cli::main_with(std::env::args_os()));
}
