fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    std::process::exit(orbitforge_cli::run(&args, &mut stdout, &mut stderr));
}
