import { ApiClient } from "./api.js";
import { App } from "./app.js";

const mount = document.querySelector<HTMLElement>("#app");
if (!mount) throw new Error("missing #app mount point");

App.boot(new ApiClient(), mount, window.localStorage).catch((error) => {
  mount.textContent = `Could not reach the lesson server: ${error}`;
});
