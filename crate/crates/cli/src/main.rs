fn main() {
    std::process::exit(tg_cli::run_command(std::env::args_os()));
}
