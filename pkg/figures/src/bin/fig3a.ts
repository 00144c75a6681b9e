import { runFigure } from "../cli";

process.exit(runFigure("fig3a", process.argv.slice(2)));
