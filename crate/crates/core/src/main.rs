fn main() {
    std::process::exit(hubo_factor::io::cli::main_exit_code());
}
