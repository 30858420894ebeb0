fn main() {
    std::process::exit(rqmc::cli::main_with(std::env::args_os()));
}
