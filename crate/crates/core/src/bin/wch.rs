fn main() {
    std::process::exit(wch::cli::main_from(std::env::args_os()));
}
