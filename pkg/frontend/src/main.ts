import { ApiClient } from './api.js';
import { App } from './app.js';

function resolveBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('service');
  if (fromQuery) {
    localStorage.setItem('radqa.service', fromQuery);
    return fromQuery;
  }
  return localStorage.getItem('radqa.service') ?? 'http://127.0.0.1:8000';
}

function main(): void {
  const mainEl = document.getElementById('view');
  const asideEl = document.getElementById('metrics');
  const bannerEl = document.getElementById('banner');
  const baseEl = document.getElementById('base-url');
  if (!mainEl || !asideEl || !bannerEl) {
    throw new Error('index.html is missing required mount points');
  }
  const baseUrl = resolveBaseUrl();
  if (baseEl) {
    baseEl.textContent = baseUrl;
  }
  new App(new ApiClient(baseUrl), mainEl, asideEl, bannerEl).start();
}

main();
