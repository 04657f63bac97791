fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(upb_cli::run(&argv));
}
