fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = optosqueeze::cli::run(std::env::args_os(), None, &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
