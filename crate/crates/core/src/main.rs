use std::process;

fn main() {
    let result = ualg::cli::run(std::env::args_os());
    print!("{}", result.stdout);
    eprint!("{}", result.stderr);
    process::exit(result.code);
}
