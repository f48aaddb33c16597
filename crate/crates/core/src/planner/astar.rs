use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::grid::{Cell, OccupancyGrid};
use super::PlanError;

/// 6-connected A* with the Manhattan heuristic. Open nodes are expanded in
/// order of lowest f, then lowest z, then lowest (x, y), which makes the
/// returned path unique for a given grid.
pub fn shortest_path(grid: &OccupancyGrid, from: Cell, to: Cell) -> Result<Vec<Cell>, PlanError> {
    for c in [from, to] {
        if !grid.is_free(&c) {
            return Err(PlanError::BlockedCell(c));
        }
    }
    let mut g_score: HashMap<Cell, usize> = HashMap::from([(from, 0)]);
    let mut parent: HashMap<Cell, Cell> = HashMap::new();
    let mut closed: HashMap<Cell, ()> = HashMap::new();
    let mut open = BinaryHeap::new();
    open.push(Reverse((from.manhattan(&to), from.z, from.x, from.y)));

    while let Some(Reverse((_, z, x, y))) = open.pop() {
        let current = Cell::new(x, y, z);
        if closed.insert(current, ()).is_some() {
            continue;
        }
        if current == to {
            let mut path = vec![current];
            let mut c = current;
            while let Some(p) = parent.get(&c) {
                path.push(*p);
                c = *p;
            }
            path.reverse();
            return Ok(path);
        }
        let g = g_score[&current];
        for n in grid.neighbors(&current) {
            if closed.contains_key(&n) {
                continue;
            }
            let tentative = g + 1;
            if g_score.get(&n).is_none_or(|&old| tentative < old) {
                g_score.insert(n, tentative);
                parent.insert(n, current);
                open.push(Reverse((tentative + n.manhattan(&to), n.z, n.x, n.y)));
            }
        }
    }
    Err(PlanError::Unreachable)
}
