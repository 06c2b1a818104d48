import { ApiClient } from "./api";
import { App } from "./app";
import "./style.css";

const root = document.getElementById("app");
if (root) {
  const app = new App(new ApiClient(import.meta.env.VITE_API_BASE ?? ""), root);
  app.render();
}
