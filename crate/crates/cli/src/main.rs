use std::io::Write;

fn main() {
    let outcome = speclat_cli::run(std::env::args_os());
    if outcome.code == 2 {
        eprint!("{}", outcome.text);
    } else {
        print!("{}", outcome.text);
        let _ = std::io::stdout().flush();
    }
    std::process::exit(outcome.code);
}
