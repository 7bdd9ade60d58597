import { createChatApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  createChatApp(root, {
    fetch: (url, init) => window.fetch(url, init),
    storage: window.localStorage,
    createAudio: (url) => new Audio(url),
  });
}
