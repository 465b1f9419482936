// Browser entry point: create a session against the same origin and poll.

import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = createApp(root, new ApiClient(""));
  void app.start().then(() => app.pollUntilDone());
}
