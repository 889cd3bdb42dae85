//! An answerer that reads only the task prompt text: it parses the question
//! board and target back out of the prompt and scans neighbors itself.

use minebench::engine::CellView;
use minebench::textboard::{parse_board, RenderOptions};

fn question_board(prompt: &str) -> &str {
    let start = prompt.rfind("Board:\n").expect("prompt has a board") + "Board:\n".len();
    let end = prompt[start..].find("\n\nQuestion:").expect("question follows board") + start;
    &prompt[start..end]
}

fn target(question: &str) -> (i32, i32) {
    let open = question.find('(').unwrap();
    let close = question[open..].find(')').unwrap() + open;
    let (r, c) = question[open + 1..close].split_once(',').unwrap();
    (r.trim().parse().unwrap(), c.trim().parse().unwrap())
}

/// The token between the last pair of quote marks on the question line.
fn queried_token(question: &str, opts: &RenderOptions) -> String {
    let body = question.trim_end_matches('?');
    let token = match opts.format {
        minebench::textboard::Format::Table => {
            let end = body.rfind('\'').unwrap();
            let start = body[..end].rfind('`').unwrap();
            &body[start + 1..end]
        }
        minebench::textboard::Format::Coordinate => {
            let end = body.rfind('"').unwrap();
            let start = body[..end].rfind('"').unwrap();
            &body[start + 1..end]
        }
    };
    token.to_string()
}

pub fn answer(prompt: &str, opts: &RenderOptions) -> String {
    let board = parse_board(question_board(prompt), opts).expect("question board parses");
    let question = prompt
        .lines()
        .filter(|l| l.starts_with("Question:"))
        .last()
        .expect("prompt has a question");
    let (r, c) = target(question);
    let cells = board.cells();
    let (rows, cols) = (board.rows() as i32, board.cols() as i32);
    let at = |r: i32, c: i32| cells[((r - 1) * cols + (c - 1)) as usize];
    if question.contains("how many") {
        let token = queried_token(question, opts);
        let query = opts.symbols.cell_for(&token).expect("queried token is a symbol");
        let mut n = 0;
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (rr, cc) = (r + dr, c + dc);
                if (dr, dc) != (0, 0) && (1..=rows).contains(&rr) && (1..=cols).contains(&cc) && at(rr, cc) == query {
                    n += 1;
                }
            }
        }
        format!("Counting the neighbors one by one.\nANSWER: {n}")
    } else {
        let cell: CellView = at(r, c);
        format!("The cell shows it.\nANSWER: {}", opts.symbols.token(cell))
    }
}
