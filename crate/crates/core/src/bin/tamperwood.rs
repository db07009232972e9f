fn main() {
    tamperwood::configure_threads();
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(tamperwood::cli::cli_main(&argv));
}
