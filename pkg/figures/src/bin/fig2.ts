import { runFigure } from "../cli";

process.exit(runFigure("fig2", process.argv.slice(2)));
