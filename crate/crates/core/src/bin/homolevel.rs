use std::io::Write;

fn main() {
    if let Err(msg) = homolevel::cli::configure_threads() {
        eprintln!("error: {msg}");
        std::process::exit(2);
    }
    let out = homolevel::cli::run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
