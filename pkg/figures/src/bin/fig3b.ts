import { runFigure } from "../cli";

process.exit(runFigure("fig3b", process.argv.slice(2)));
