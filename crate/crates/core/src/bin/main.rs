fn main() {
    let out = &mut std::io::stdout().lock();
    let err = &mut std::io::stderr().lock();
    let code = mpccip::cli::run(std::env::args_os(), out, err);
    std::process::exit(code);
}
