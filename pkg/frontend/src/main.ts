import { App } from './app';
import './style.css';

function readConfig(): { apiBase: string; tileUrl: string | null } {
  const params = new URLSearchParams(window.location.search);
  return {
    apiBase: params.get('api') ?? '',
    tileUrl: params.get('tiles'),
  };
}

const config = readConfig();
new App(document.getElementById('app')!, {
  apiBase: config.apiBase,
  map: { tileUrl: config.tileUrl },
});
