import { runFigure } from "../cli";

process.exit(runFigure("fig4", process.argv.slice(2)));
