use texplane_cli::{commands, config};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--version" || a == "-V") {
        println!("texplane {}", env!("CARGO_PKG_VERSION"));
        return;
    }
    let invocation = match config::parse_args(args) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    if let Err(e) = commands::run(&invocation) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
