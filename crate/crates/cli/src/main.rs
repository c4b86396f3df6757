fn main() {
    std::process::exit(adanorm_cli::run(std::env::args_os()));
}
