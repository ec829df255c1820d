fn main() {
    std::process::exit(jrpd::cli::main_entry(std::env::args_os()));
}
