import { createApp, startPolling } from "./app";
import "./style.css";

const root = document.getElementById("app") as HTMLElement;
const app = createApp(root);
startPolling(app);
void app.refresh();
