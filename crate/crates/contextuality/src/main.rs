use contextuality::cli::run_command;

fn main() {
    let (code, report) = run_command(std::env::args_os());
    if code == 0 {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    std::process::exit(code);
}
