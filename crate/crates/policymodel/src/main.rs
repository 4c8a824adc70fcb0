use std::io::{stderr, stdin, stdout};

fn main() {
    let code = policymodel::cli::run(std::env::args_os(), &mut stdin().lock(), &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}
